#pragma once

// Umbrella header.

#include "exrec/corpus.hpp"
#include "exrec/error.hpp"
#include "exrec/evaluation.hpp"
#include "exrec/graph.hpp"
#include "exrec/hash.hpp"
#include "exrec/index_io.hpp"
#include "exrec/ingest.hpp"
#include "exrec/matcher.hpp"
#include "exrec/profile.hpp"
#include "exrec/ranking.hpp"
#include "exrec/reputation.hpp"
#include "exrec/store_io.hpp"
#include "exrec/synthetic.hpp"
#include "exrec/tfidf.hpp"
#include "exrec/text/pipeline.hpp"
#include "exrec/timestamp.hpp"
