#pragma once

#include "ggq/algorithms.hpp"
#include "ggq/errors.hpp"
#include "ggq/features.hpp"
#include "ggq/garnet.hpp"
#include "ggq/harness/bands.hpp"
#include "ggq/harness/config.hpp"
#include "ggq/harness/experiment.hpp"
#include "ggq/harness/plot.hpp"
#include "ggq/harness/rates.hpp"
#include "ggq/harness/sweep.hpp"
#include "ggq/harness/variance.hpp"
#include "ggq/io.hpp"
#include "ggq/mdp.hpp"
#include "ggq/metrics.hpp"
#include "ggq/oracle.hpp"
#include "ggq/policy.hpp"
#include "ggq/problem.hpp"
#include "ggq/rng.hpp"
#include "ggq/sampler.hpp"
#include "ggq/updates.hpp"
#include "ggq/version.hpp"
