#pragma once

// Whole library in one include. The bench/ headers are separate because they
// pull in the JSON dependency.

#include "counters.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "graditer.hpp"
#include "hss.hpp"
#include "inner.hpp"
#include "krylov.hpp"
#include "matrix_market.hpp"
#include "problems.hpp"
#include "realify.hpp"
#include "report.hpp"
#include "sparse.hpp"
#include "split.hpp"
#include "vector.hpp"
