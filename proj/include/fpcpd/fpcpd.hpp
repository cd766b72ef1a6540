#pragma once

// Everything except report_json.hpp (which needs nlohmann/json).

#include "fpcpd/tensor.hpp"
#include "fpcpd/tensor_io.hpp"
#include "fpcpd/block_plan.hpp"
#include "fpcpd/block_executor.hpp"
#include "fpcpd/solver_config.hpp"
#include "fpcpd/gradient.hpp"
#include "fpcpd/init.hpp"
#include "fpcpd/als.hpp"
#include "fpcpd/sals.hpp"
#include "fpcpd/sgd.hpp"
#include "fpcpd/solvers.hpp"
#include "fpcpd/corcondia.hpp"
#include "fpcpd/synthetic.hpp"
#include "fpcpd/benchmark.hpp"
#include "fpcpd/shm/features.hpp"
#include "fpcpd/shm/ocsvm.hpp"
#include "fpcpd/shm/localization.hpp"
#include "fpcpd/shm/pipeline.hpp"
#include "fpcpd/shm/config.hpp"
#include "fpcpd/shm/events_io.hpp"
