#pragma once

// Everything except io/output.hpp, which needs OpenSSL.

#include "mincusum/bounds.hpp"
#include "mincusum/cusum.hpp"
#include "mincusum/distributions.hpp"
#include "mincusum/error.hpp"
#include "mincusum/estimate.hpp"
#include "mincusum/io/config.hpp"
#include "mincusum/io/csv.hpp"
#include "mincusum/montecarlo.hpp"
#include "mincusum/parallel.hpp"
#include "mincusum/random.hpp"
#include "mincusum/scenarios.hpp"
#include "mincusum/studies.hpp"
