#pragma once

// Umbrella header.
#include "decodeq/codes.hpp"
#include "decodeq/config.hpp"
#include "decodeq/costmodel.hpp"
#include "decodeq/engine.hpp"
#include "decodeq/harness.hpp"
#include "decodeq/metrics.hpp"
#include "decodeq/policy.hpp"
#include "decodeq/records.hpp"
#include "decodeq/sweep.hpp"
#include "decodeq/workload.hpp"
