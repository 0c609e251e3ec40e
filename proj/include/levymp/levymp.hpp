#pragma once

#include "closedform.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "kernels.hpp"
#include "numbers.hpp"
#include "parallel.hpp"
#include "pathsim.hpp"
#include "proposal.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "spectral.hpp"
#include "stats.hpp"
