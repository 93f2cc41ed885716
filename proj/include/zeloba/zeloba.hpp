#pragma once

#include "zeloba/errors.hpp"
#include "zeloba/estimator.hpp"
#include "zeloba/oracle.hpp"
#include "zeloba/problems.hpp"
#include "zeloba/random.hpp"
#include "zeloba/smoothing.hpp"
#include "zeloba/solver.hpp"
#include "zeloba/types.hpp"
#include "zeloba/unicycle.hpp"
