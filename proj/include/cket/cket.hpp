#pragma once

// Distribution-free tests of a candidate regression function for binary
// classification, built on conditional kernel mean embeddings.

#include "cket/datagen.hpp"
#include "cket/embedding.hpp"
#include "cket/errors.hpp"
#include "cket/estimators.hpp"
#include "cket/harness.hpp"
#include "cket/kernels.hpp"
#include "cket/resampling.hpp"
#include "cket/rng.hpp"
#include "cket/sample.hpp"
