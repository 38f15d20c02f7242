#pragma once

#include "trex/common.hpp"
#include "trex/csv.hpp"
#include "trex/distributions.hpp"
#include "trex/io.hpp"
#include "trex/lars.hpp"
#include "trex/mlp.hpp"
#include "trex/model_io.hpp"
#include "trex/occurrence.hpp"
#include "trex/pipeline.hpp"
#include "trex/selector.hpp"
#include "trex/standardize.hpp"
#include "trex/synth.hpp"
