#pragma once

#include "spectral_tilt/analog_design.hpp"
#include "spectral_tilt/bode_analysis.hpp"
#include "spectral_tilt/digitize.hpp"
#include "spectral_tilt/error.hpp"
#include "spectral_tilt/io.hpp"
#include "spectral_tilt/noise.hpp"
#include "spectral_tilt/runtime.hpp"
