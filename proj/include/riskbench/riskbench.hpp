#pragma once

#include "riskbench/error.hpp"
#include "riskbench/money.hpp"
#include "riskbench/catalog.hpp"
#include "riskbench/submission.hpp"
#include "riskbench/aggregation.hpp"
#include "riskbench/gap_index.hpp"
#include "riskbench/forecast.hpp"
#include "riskbench/monte_carlo.hpp"
#include "riskbench/json_io.hpp"
#include "riskbench/config.hpp"
#include "riskbench/service.hpp"
