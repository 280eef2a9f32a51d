// seeopt.hpp — umbrella include.

#pragma once

#include "seeopt/backward.hpp"
#include "seeopt/config.hpp"
#include "seeopt/control.hpp"
#include "seeopt/forward.hpp"
#include "seeopt/io.hpp"
#include "seeopt/lq.hpp"
#include "seeopt/presets.hpp"
#include "seeopt/problem.hpp"
#include "seeopt/report.hpp"
#include "seeopt/rng.hpp"
#include "seeopt/runner.hpp"
#include "seeopt/spectral.hpp"
#include "seeopt/types.hpp"
#include "seeopt/verify.hpp"
#include "seeopt/version.hpp"
