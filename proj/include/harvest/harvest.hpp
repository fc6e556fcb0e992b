// Umbrella header for the harvest library.
#pragma once

#include "harvest/analysis.hpp"
#include "harvest/beam.hpp"
#include "harvest/errors.hpp"
#include "harvest/model.hpp"
#include "harvest/rk4.hpp"
#include "harvest/transient.hpp"
#include "harvest/units.hpp"
