#pragma once

#include "tdcpo/bench.hpp"
#include "tdcpo/datagen.hpp"
#include "tdcpo/graph.hpp"
#include "tdcpo/graph_io.hpp"
#include "tdcpo/piecewise.hpp"
#include "tdcpo/scope.hpp"
#include "tdcpo/search.hpp"
#include "tdcpo/types.hpp"
