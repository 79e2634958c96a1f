#pragma once

#include "evchain/chain.hpp"
#include "evchain/checkpoint.hpp"
#include "evchain/corpus.hpp"
#include "evchain/embeddings.hpp"
#include "evchain/error.hpp"
#include "evchain/harness.hpp"
#include "evchain/metrics.hpp"
#include "evchain/models.hpp"
#include "evchain/nncore.hpp"
#include "evchain/saliency.hpp"
#include "evchain/synthetic.hpp"
