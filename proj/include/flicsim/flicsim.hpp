// Convenience umbrella: the whole toolkit in one include.
#pragma once

#include "flicsim/conformance.hpp"
#include "flicsim/fir.hpp"
#include "flicsim/flickermeter.hpp"
#include "flicsim/iir.hpp"
#include "flicsim/io.hpp"
#include "flicsim/signal.hpp"
#include "flicsim/svg.hpp"
#include "flicsim/sweep.hpp"
#include "flicsim/thd.hpp"
#include "flicsim/version.hpp"
