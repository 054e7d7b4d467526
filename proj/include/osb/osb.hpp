#pragma once

#include "osb/campaign.hpp"
#include "osb/config.hpp"
#include "osb/corpus.hpp"
#include "osb/errors.hpp"
#include "osb/interpolation.hpp"
#include "osb/map_family.hpp"
#include "osb/matrix.hpp"
#include "osb/matrix_io.hpp"
#include "osb/order_stats.hpp"
#include "osb/orlicz.hpp"
#include "osb/quadrature.hpp"
#include "osb/rational.hpp"
#include "osb/report.hpp"
#include "osb/rng.hpp"
