#pragma once

// Umbrella header.

#include "cascade/core.hpp"
#include "cascade/poly.hpp"
#include "cascade/system.hpp"
#include "cascade/level_set.hpp"
#include "cascade/bounds.hpp"
#include "cascade/assumptions.hpp"
#include "cascade/seq_state.hpp"
#include "cascade/kernel.hpp"
#include "cascade/semigroup.hpp"
#include "cascade/resolvent.hpp"
#include "cascade/cesaro.hpp"
#include "cascade/decay_fit.hpp"
#include "cascade/models.hpp"
#include "cascade/io.hpp"
