#pragma once

#include "wtperf/config.hpp"
#include "wtperf/dataset.hpp"
#include "wtperf/farm.hpp"
#include "wtperf/gp.hpp"
#include "wtperf/ingest.hpp"
#include "wtperf/matching.hpp"
#include "wtperf/metrics.hpp"
#include "wtperf/subset_selection.hpp"
#include "wtperf/synthetic.hpp"
