#pragma once

#include "certifier.hpp"
#include "constants.hpp"
#include "eigen.hpp"
#include "errors.hpp"
#include "expansion.hpp"
#include "graph.hpp"
#include "log_scalar.hpp"
#include "norms.hpp"
#include "poincare.hpp"
#include "random_graphs.hpp"
#include "rng.hpp"
#include "spectral.hpp"
