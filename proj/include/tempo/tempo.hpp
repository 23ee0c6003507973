#pragma once

#include "tempo/channel.hpp"
#include "tempo/consensus.hpp"
#include "tempo/dist.hpp"
#include "tempo/engine.hpp"
#include "tempo/errors.hpp"
#include "tempo/fedsim.hpp"
#include "tempo/fig1.hpp"
#include "tempo/library.hpp"
#include "tempo/metrics.hpp"
#include "tempo/pipeline.hpp"
#include "tempo/process.hpp"
#include "tempo/protocols.hpp"
#include "tempo/queue.hpp"
#include "tempo/report.hpp"
#include "tempo/rng.hpp"
#include "tempo/runner.hpp"
#include "tempo/scenario.hpp"
#include "tempo/source.hpp"
#include "tempo/summary.hpp"
#include "tempo/time.hpp"
