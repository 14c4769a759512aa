#pragma once

// Umbrella header.

#include "slrx/answer_parser.hpp"
#include "slrx/backoff.hpp"
#include "slrx/chat_client.hpp"
#include "slrx/corpus.hpp"
#include "slrx/embedding.hpp"
#include "slrx/entries.hpp"
#include "slrx/errors.hpp"
#include "slrx/evaluation.hpp"
#include "slrx/extraction.hpp"
#include "slrx/http.hpp"
#include "slrx/mock_llm.hpp"
#include "slrx/pipeline.hpp"
#include "slrx/prompt.hpp"
#include "slrx/retrieval.hpp"
#include "slrx/tokenizer.hpp"
#include "slrx/util.hpp"
#include "slrx/version.hpp"
