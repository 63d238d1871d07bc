#pragma once

#include "deal/distributions.hpp"
#include "deal/error.hpp"
#include "deal/harness.hpp"
#include "deal/kde.hpp"
#include "deal/matrix.hpp"
#include "deal/preprocess.hpp"
#include "deal/report.hpp"
#include "deal/rng.hpp"
#include "deal/risk.hpp"
#include "deal/stats.hpp"
#include "deal/strategies.hpp"
