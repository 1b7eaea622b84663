#pragma once

#include "xamr/cluster.hpp"
#include "xamr/corpus.hpp"
#include "xamr/eid.hpp"
#include "xamr/error.hpp"
#include "xamr/lexicons.hpp"
#include "xamr/method_spec.hpp"
#include "xamr/metrics.hpp"
#include "xamr/nested.hpp"
#include "xamr/partition.hpp"
#include "xamr/report.hpp"
#include "xamr/harness/bench.hpp"
#include "xamr/harness/diagnose.hpp"
#include "xamr/harness/synthetic.hpp"
#include "xamr/llm/annotate.hpp"
#include "xamr/llm/pool.hpp"
#include "xamr/llm/prompt.hpp"
#include "xamr/llm/response.hpp"
#include "xamr/llm/transport.hpp"
