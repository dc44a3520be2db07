#pragma once

#include "cachesdp/error.hpp"
#include "cachesdp/config.hpp"
#include "cachesdp/quadrature.hpp"
#include "cachesdp/hypergeometric.hpp"
#include "cachesdp/channel.hpp"
#include "cachesdp/catalog.hpp"
#include "cachesdp/analysis.hpp"
#include "cachesdp/asymptotics.hpp"
#include "cachesdp/optimizer.hpp"
#include "cachesdp/simulator.hpp"
#include "cachesdp/experiment.hpp"
