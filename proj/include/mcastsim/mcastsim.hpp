#pragma once

#include "mcastsim/analysis.hpp"
#include "mcastsim/fountain.hpp"
#include "mcastsim/harness.hpp"
#include "mcastsim/mobility.hpp"
#include "mcastsim/protocol.hpp"
#include "mcastsim/rng.hpp"
#include "mcastsim/torus.hpp"
#include "mcastsim/wireless.hpp"
