#pragma once

#include "lmm/dataset.hpp"
#include "lmm/error.hpp"
#include "lmm/experiment.hpp"
#include "lmm/label_history.hpp"
#include "lmm/metrics.hpp"
#include "lmm/model.hpp"
#include "lmm/noise.hpp"
#include "lmm/optimizer.hpp"
#include "lmm/refurbished_set.hpp"
#include "lmm/refurbisher.hpp"
#include "lmm/report.hpp"
#include "lmm/rng.hpp"
#include "lmm/self_training.hpp"
#include "lmm/startup_monitor.hpp"
#include "lmm/trainer.hpp"
