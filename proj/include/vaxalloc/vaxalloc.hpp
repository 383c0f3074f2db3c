#pragma once

#include "vaxalloc/allocation.hpp"
#include "vaxalloc/config.hpp"
#include "vaxalloc/epidemic.hpp"
#include "vaxalloc/errors.hpp"
#include "vaxalloc/graph.hpp"
#include "vaxalloc/harness.hpp"
#include "vaxalloc/objective.hpp"
#include "vaxalloc/random.hpp"
#include "vaxalloc/regret.hpp"
#include "vaxalloc/solvers.hpp"
