#pragma once

// Everything at once.

#include "potbayes/bayes.hpp"
#include "potbayes/dynamic.hpp"
#include "potbayes/error.hpp"
#include "potbayes/frequentist.hpp"
#include "potbayes/gpd.hpp"
#include "potbayes/io/csv.hpp"
#include "potbayes/likelihood.hpp"
#include "potbayes/random.hpp"
#include "potbayes/report.hpp"
#include "potbayes/serial_covariance.hpp"
#include "potbayes/sim/experiments.hpp"
#include "potbayes/sim/models.hpp"
#include "potbayes/sim/truth.hpp"
