#pragma once

#include "core.hpp"
#include "cutweight.hpp"
#include "dendro.hpp"
#include "eval.hpp"
#include "io.hpp"
#include "linkage.hpp"
#include "mst.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "spanner.hpp"
