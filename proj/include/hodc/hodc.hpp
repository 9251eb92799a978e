#pragma once

#include "hodc/cubic.hpp"
#include "hodc/derivative_check.hpp"
#include "hodc/diagnostics.hpp"
#include "hodc/errors.hpp"
#include "hodc/inner.hpp"
#include "hodc/model.hpp"
#include "hodc/oracles.hpp"
#include "hodc/problems.hpp"
#include "hodc/solver.hpp"
