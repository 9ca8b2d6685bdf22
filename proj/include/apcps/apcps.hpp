#pragma once

#include "apcps/multiset.hpp"
#include "apcps/symbol.hpp"
#include "apcps/model.hpp"
#include "apcps/canonical_word.hpp"
#include "apcps/std_semantics.hpp"
#include "apcps/alt_config.hpp"
#include "apcps/alt_semantics.hpp"
#include "apcps/abstraction.hpp"
#include "apcps/order.hpp"
#include "apcps/petri.hpp"
#include "apcps/shapes.hpp"
#include "apcps/invariant.hpp"
#include "apcps/cover.hpp"
#include "apcps/generate.hpp"
