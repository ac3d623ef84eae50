#pragma once

// Umbrella header for the evaluation framework: corpus ingestion, the four
// automated Tier I metrics, judge-based Tier II scoring, isotonic Tier III
// calibration, agreement statistics, and the reporting pipeline.

#include "tritier/calibration.hpp"
#include "tritier/config.hpp"
#include "tritier/corpus.hpp"
#include "tritier/error.hpp"
#include "tritier/gateway.hpp"
#include "tritier/image.hpp"
#include "tritier/isotonic.hpp"
#include "tritier/judge.hpp"
#include "tritier/judge_types.hpp"
#include "tritier/mock.hpp"
#include "tritier/pipeline.hpp"
#include "tritier/prompts.hpp"
#include "tritier/reports.hpp"
#include "tritier/rng.hpp"
#include "tritier/runner.hpp"
#include "tritier/sha256.hpp"
#include "tritier/stats.hpp"
#include "tritier/text.hpp"
#include "tritier/tier1.hpp"
