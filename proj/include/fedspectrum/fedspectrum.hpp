#pragma once

#include "fedspectrum/dataset.hpp"
#include "fedspectrum/engine.hpp"
#include "fedspectrum/error.hpp"
#include "fedspectrum/federation.hpp"
#include "fedspectrum/placement.hpp"
#include "fedspectrum/radio_env.hpp"
#include "fedspectrum/report_io.hpp"
#include "fedspectrum/rng.hpp"
#include "fedspectrum/scenario.hpp"
#include "fedspectrum/sensing.hpp"
