#pragma once

#include "rpce/error.hpp"
#include "rpce/random.hpp"
#include "rpce/prob.hpp"
#include "rpce/basis.hpp"
#include "rpce/quadrature.hpp"
#include "rpce/regress.hpp"
#include "rpce/select.hpp"
#include "rpce/pce.hpp"
#include "rpce/resample.hpp"
#include "rpce/sobol.hpp"
#include "rpce/bench.hpp"
#include "rpce/experiment.hpp"
