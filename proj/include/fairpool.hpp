#pragma once

#include "fairpool/bench.hpp"
#include "fairpool/diagram.hpp"
#include "fairpool/document.hpp"
#include "fairpool/dot.hpp"
#include "fairpool/error.hpp"
#include "fairpool/fairness.hpp"
#include "fairpool/judgment.hpp"
#include "fairpool/opinion.hpp"
#include "fairpool/pooling.hpp"
#include "fairpool/random.hpp"
#include "fairpool/scm.hpp"
