#pragma once

#include "sem/attacks.hpp"
#include "sem/common.hpp"
#include "sem/dataset.hpp"
#include "sem/embedding.hpp"
#include "sem/encoder.hpp"
#include "sem/harness.hpp"
#include "sem/model.hpp"
#include "sem/parallel.hpp"
#include "sem/rng.hpp"
#include "sem/synthetic.hpp"
#include "sem/text.hpp"
#include "sem/vocab.hpp"
