#pragma once

#include "baire/approx.hpp"
#include "baire/borel.hpp"
#include "baire/builtins.hpp"
#include "baire/catalog.hpp"
#include "baire/embed.hpp"
#include "baire/family_io.hpp"
#include "baire/full.hpp"
#include "baire/grid_check.hpp"
#include "baire/seq.hpp"
#include "baire/seqmap.hpp"
#include "baire/seqmap_io.hpp"
#include "baire/sigma02.hpp"
#include "baire/text.hpp"
