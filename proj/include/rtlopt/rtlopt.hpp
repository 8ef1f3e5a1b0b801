#pragma once

#include "rtlopt/config.hpp"
#include "rtlopt/corpus.hpp"
#include "rtlopt/errors.hpp"
#include "rtlopt/evaluation.hpp"
#include "rtlopt/hash.hpp"
#include "rtlopt/leakage_guard.hpp"
#include "rtlopt/model_client.hpp"
#include "rtlopt/optimizer.hpp"
#include "rtlopt/pairing.hpp"
#include "rtlopt/principles.hpp"
#include "rtlopt/process.hpp"
#include "rtlopt/prompts.hpp"
#include "rtlopt/rng.hpp"
#include "rtlopt/synthesis.hpp"
#include "rtlopt/synthesis_extern.hpp"
#include "rtlopt/tfidf.hpp"
#include "rtlopt/verilog.hpp"
