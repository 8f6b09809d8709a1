#pragma once

#include "wde/cli.hpp"
#include "wde/conditions.hpp"
#include "wde/error.hpp"
#include "wde/gaussian_model.hpp"
#include "wde/inequalities.hpp"
#include "wde/io.hpp"
#include "wde/linalg.hpp"
#include "wde/moments.hpp"
#include "wde/monte_carlo.hpp"
#include "wde/random.hpp"
#include "wde/scenario.hpp"
#include "wde/selftest.hpp"
#include "wde/weights.hpp"
