#pragma once

#include "amsf/attention.hpp"
#include "amsf/config.hpp"
#include "amsf/decomposition.hpp"
#include "amsf/denoiser.hpp"
#include "amsf/embedding.hpp"
#include "amsf/error.hpp"
#include "amsf/harness.hpp"
#include "amsf/metrics.hpp"
#include "amsf/numerics.hpp"
#include "amsf/random.hpp"
#include "amsf/sar.hpp"
