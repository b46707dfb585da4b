// Umbrella header.
#pragma once

#include "knng/builder.hpp"
#include "knng/builder_types.hpp"
#include "knng/core.hpp"
#include "knng/io.hpp"
#include "knng/oracle.hpp"
#include "knng/pair_cache.hpp"
#include "knng/partitioner.hpp"
#include "knng/propagation.hpp"
#include "knng/rng.hpp"
#include "knng/synthetic.hpp"
#include "knng/theory.hpp"
