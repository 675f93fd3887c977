#pragma once

#include "dramagen/config.hpp"
#include "dramagen/corpus.hpp"
#include "dramagen/dataset.hpp"
#include "dramagen/error.hpp"
#include "dramagen/generator.hpp"
#include "dramagen/graph_rank.hpp"
#include "dramagen/keywords.hpp"
#include "dramagen/lm_backend.hpp"
#include "dramagen/metrics.hpp"
#include "dramagen/normalizer.hpp"
#include "dramagen/prompt.hpp"
#include "dramagen/remote_backend.hpp"
#include "dramagen/textproc.hpp"
#include "dramagen/tokenizer.hpp"
#include "dramagen/utf8.hpp"
#include "dramagen/wordlists.hpp"
