#pragma once

// Umbrella header: the whole library in one include.

#include "dramnet/analysis.hpp"
#include "dramnet/builder.hpp"
#include "dramnet/command.hpp"
#include "dramnet/config.hpp"
#include "dramnet/emit.hpp"
#include "dramnet/errors.hpp"
#include "dramnet/petri.hpp"
#include "dramnet/timing.hpp"
#include "dramnet/verify.hpp"
