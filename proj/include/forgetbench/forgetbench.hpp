#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/rng.hpp"
#include "forgetbench/core/types.hpp"
#include "forgetbench/data/csv.hpp"
#include "forgetbench/data/dataset.hpp"
#include "forgetbench/data/idx.hpp"
#include "forgetbench/data/loader.hpp"
#include "forgetbench/data/streams.hpp"
#include "forgetbench/data/synth.hpp"
#include "forgetbench/ewc/ewc.hpp"
#include "forgetbench/fcbf/fcbf.hpp"
#include "forgetbench/fel/fel.hpp"
#include "forgetbench/geppnet/geppnet.hpp"
#include "forgetbench/geppnet/som.hpp"
#include "forgetbench/harness/config.hpp"
#include "forgetbench/harness/models.hpp"
#include "forgetbench/harness/plots.hpp"
#include "forgetbench/harness/record.hpp"
#include "forgetbench/harness/run.hpp"
#include "forgetbench/harness/summary.hpp"
#include "forgetbench/learner/accuracy.hpp"
#include "forgetbench/learner/ideal.hpp"
#include "forgetbench/learner/learner.hpp"
#include "forgetbench/learner/mlp.hpp"
#include "forgetbench/metrics/omega.hpp"
#include "forgetbench/nn/dense.hpp"
#include "forgetbench/nn/loss.hpp"
#include "forgetbench/nn/optimizer.hpp"
#include "forgetbench/nn/params.hpp"
#include "forgetbench/nn/trainer.hpp"
#include "forgetbench/pathnet/pathnet.hpp"
