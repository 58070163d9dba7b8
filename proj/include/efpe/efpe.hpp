#pragma once

#include "bench.hpp"
#include "cfr_plus.hpp"
#include "common.hpp"
#include "egt.hpp"
#include "game_tree.hpp"
#include "metrics.hpp"
#include "sequence_form.hpp"
#include "smoothing.hpp"
#include "treeplex.hpp"
