#pragma once

#include "ghl/error.hpp"
#include "ghl/rng.hpp"
#include "ghl/parallel.hpp"
#include "ghl/io.hpp"
#include "ghl/heading.hpp"
#include "ghl/sample.hpp"
#include "ghl/simgen.hpp"
#include "ghl/nn/tensor.hpp"
#include "ghl/nn/layers.hpp"
#include "ghl/nn/sequential.hpp"
#include "ghl/nn/loss.hpp"
#include "ghl/nn/adamw.hpp"
#include "ghl/nn/gradcheck.hpp"
#include "ghl/model/ghnet.hpp"
#include "ghl/model/checkpoint.hpp"
#include "ghl/model/train.hpp"
#include "ghl/model/verify.hpp"
#include "ghl/data/csv.hpp"
#include "ghl/data/split.hpp"
#include "ghl/data/ingest.hpp"
#include "ghl/eval/metrics.hpp"
#include "ghl/eval/report.hpp"
#include "ghl/eval/curve.hpp"
