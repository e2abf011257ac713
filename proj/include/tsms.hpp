#pragma once

#include "tsms/core.hpp"
#include "tsms/error.hpp"
#include "tsms/harness.hpp"
#include "tsms/io.hpp"
#include "tsms/memory_bank.hpp"
#include "tsms/metrics.hpp"
#include "tsms/sampler.hpp"
#include "tsms/serialize.hpp"
#include "tsms/similarity.hpp"
