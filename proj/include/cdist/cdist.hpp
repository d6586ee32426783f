#ifndef CDIST_CDIST_HPP
#define CDIST_CDIST_HPP

#include "cdist/condition.hpp"
#include "cdist/creal.hpp"
#include "cdist/error.hpp"
#include "cdist/interval.hpp"
#include "cdist/lang/eval.hpp"
#include "cdist/lang/global_env.hpp"
#include "cdist/lang/parser.hpp"
#include "cdist/lang/syntax.hpp"
#include "cdist/lang/typecheck.hpp"
#include "cdist/lang/value.hpp"
#include "cdist/lazy.hpp"
#include "cdist/measure.hpp"
#include "cdist/openset.hpp"
#include "cdist/rational.hpp"
#include "cdist/sampler.hpp"
#include "cdist/tape.hpp"

#endif
