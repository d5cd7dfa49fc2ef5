#pragma once

#include "dval/error.hpp"
#include "dval/pddl/model.hpp"
#include "dval/pddl/sexpr.hpp"
#include "dval/pddl/parser.hpp"
#include "dval/pddl/validate.hpp"
#include "dval/pddl/canonical.hpp"
#include "dval/ground.hpp"
#include "dval/macro.hpp"
#include "dval/search.hpp"
#include "dval/mapping.hpp"
#include "dval/oracle.hpp"
#include "dval/pipeline.hpp"
#include "dval/harness.hpp"
#include "dval/report.hpp"
