#pragma once

#include "rnnbelief/experiment/config.hpp"
#include "rnnbelief/experiment/correlation.hpp"
#include "rnnbelief/experiment/environment.hpp"
#include "rnnbelief/experiment/metadata.hpp"
#include "rnnbelief/experiment/metrics_io.hpp"
#include "rnnbelief/experiment/pipeline.hpp"
#include "rnnbelief/experiment/protocol.hpp"
#include "rnnbelief/experiment/sample_io.hpp"
#include "rnnbelief/experiment/sampling.hpp"
