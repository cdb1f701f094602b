#pragma once

#include "itercert/box_eval.hpp"
#include "itercert/bsp.hpp"
#include "itercert/engines.hpp"
#include "itercert/errors.hpp"
#include "itercert/families.hpp"
#include "itercert/interval.hpp"
#include "itercert/leaf_stream.hpp"
#include "itercert/pipeline.hpp"
#include "itercert/planner.hpp"
#include "itercert/poly.hpp"
#include "itercert/report.hpp"
#include "itercert/rng.hpp"
#include "itercert/stream.hpp"
