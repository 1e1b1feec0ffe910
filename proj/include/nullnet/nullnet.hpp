#pragma once

#include "nullnet/bias.hpp"
#include "nullnet/dataset.hpp"
#include "nullnet/errors.hpp"
#include "nullnet/graph.hpp"
#include "nullnet/io.hpp"
#include "nullnet/matrix.hpp"
#include "nullnet/models.hpp"
#include "nullnet/netstats.hpp"
#include "nullnet/pipeline.hpp"
#include "nullnet/polylog.hpp"
#include "nullnet/sampler.hpp"
#include "nullnet/selection.hpp"
#include "nullnet/solver.hpp"
