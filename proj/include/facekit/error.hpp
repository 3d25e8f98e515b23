#pragma once

#include <stdexcept>
#include <string>

namespace facekit {

// Every failure mode the library reports. Tests match on the code, not the
// message text.
enum class errc {
    // linear algebra
    non_square,
    asymmetric,
    no_convergence,
    singular_after_ridge,
    dimension_mismatch,
    zero_matrix,
    not_finite,
    // image / dataset I/O
    io_error,
    malformed_header,
    unsupported_maxval,
    truncated_data,
    insufficient_samples,
    parse_error,
    // subspace
    empty_subset,
    degenerate_data,
    index_out_of_range,
    duplicate_index,
    unsupported_scheme,
    // classification
    empty_gallery,
    shape_mismatch,
    no_votes,
    all_zero_weights,
    length_mismatch,
    // ensemble
    d_too_large,
    too_few_items,
    t_denominator_zero,
    count_out_of_range,
    // generic precondition / config violations
    bad_argument,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
    throw error(code, message);
}

inline void require(bool condition, errc code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace facekit
