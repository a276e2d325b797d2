#pragma once

#include "cinenet/catalog.hpp"
#include "cinenet/catalog_stats.hpp"
#include "cinenet/common.hpp"
#include "cinenet/csv.hpp"
#include "cinenet/features.hpp"
#include "cinenet/graph.hpp"
#include "cinenet/learners.hpp"
#include "cinenet/netstats.hpp"
#include "cinenet/node2vec.hpp"
#include "cinenet/pipeline.hpp"
#include "cinenet/rng.hpp"
#include "cinenet/runconfig.hpp"
#include "cinenet/smote.hpp"
#include "cinenet/synth.hpp"
