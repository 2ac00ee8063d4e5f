#pragma once

#include "rauq/analysis.hpp"
#include "rauq/baselines.hpp"
#include "rauq/config.hpp"
#include "rauq/core.hpp"
#include "rauq/error.hpp"
#include "rauq/evaluation.hpp"
#include "rauq/synthetic.hpp"
#include "rauq/trace.hpp"
#include "rauq/trace_io.hpp"
