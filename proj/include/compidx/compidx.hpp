#pragma once

#include "compidx/aggregate.hpp"
#include "compidx/classify.hpp"
#include "compidx/dataset.hpp"
#include "compidx/diagnostics.hpp"
#include "compidx/error.hpp"
#include "compidx/grid.hpp"
#include "compidx/normalize.hpp"
#include "compidx/published_tables.hpp"
#include "compidx/sensitivity.hpp"
#include "compidx/text.hpp"
