#pragma once

#include "modclust/bench.hpp"
#include "modclust/fuzzy.hpp"
#include "modclust/mdg.hpp"
#include "modclust/optimizer.hpp"
#include "modclust/rng.hpp"
