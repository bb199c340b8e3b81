#pragma once

// Umbrella header for the leak localization toolkit.

#include "leakloc/align.hpp"
#include "leakloc/calibration.hpp"
#include "leakloc/csv.hpp"
#include "leakloc/errors.hpp"
#include "leakloc/hydraulics.hpp"
#include "leakloc/interference.hpp"
#include "leakloc/localizer.hpp"
#include "leakloc/manifest.hpp"
#include "leakloc/reference_data.hpp"
#include "leakloc/reproduce.hpp"
#include "leakloc/serialization.hpp"
#include "leakloc/simulator.hpp"
#include "leakloc/types.hpp"
#include "leakloc/xcorr.hpp"
