#pragma once

// Umbrella header: DRAM decay + disturbance simulator, query procedure,
// flip-set metrics, key derivation, and the experiment runners.

#include "hammerpuf/cells.hpp"
#include "hammerpuf/device.hpp"
#include "hammerpuf/engine.hpp"
#include "hammerpuf/errors.hpp"
#include "hammerpuf/expected_counts.hpp"
#include "hammerpuf/experiments.hpp"
#include "hammerpuf/fuzzy_extractor.hpp"
#include "hammerpuf/geometry.hpp"
#include "hammerpuf/measurement.hpp"
#include "hammerpuf/metrics.hpp"
#include "hammerpuf/model_params.hpp"
#include "hammerpuf/puf_config.hpp"
#include "hammerpuf/row_pattern.hpp"
#include "hammerpuf/version.hpp"
#include "hammerpuf/workspace.hpp"
