#pragma once

#include "rush/benchgen.hpp"
#include "rush/core.hpp"
#include "rush/errors.hpp"
#include "rush/harness.hpp"
#include "rush/random.hpp"
#include "rush/schedulers.hpp"
#include "rush/theory.hpp"
#include "rush/verify.hpp"
