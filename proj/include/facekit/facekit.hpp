#pragma once

// Umbrella header.

#include "facekit/classify.hpp"
#include "facekit/dataset.hpp"
#include "facekit/distance.hpp"
#include "facekit/eigen.hpp"
#include "facekit/ensemble.hpp"
#include "facekit/error.hpp"
#include "facekit/experiment.hpp"
#include "facekit/image.hpp"
#include "facekit/matrix.hpp"
#include "facekit/parallel.hpp"
#include "facekit/rng.hpp"
#include "facekit/subspace.hpp"
#include "facekit/svg.hpp"
