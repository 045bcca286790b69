#pragma once

// Statements whose verdict should not depend on the characteristic.

#include "wb/transfer.hpp"

namespace transfer_suite {

inline const char* kModel = R"(
    var x : VF
    var w : VF
    var L : ZZ
    var z : ZZ

    motivic qinv { term { alpha: -ord(x) } }
    motivic qinv2 { term { alpha: -2 * ord(x) } }
    motivic qpos { term { alpha: ord(x) } }
    motivic ordx { term { beta: ord(x) } }
    motivic pl { term { alpha: L } }
    motivic lq { term { alpha: -L; beta: L + 1 } }
    motivic qinvz { term { alpha: -z } }
    motivic sq { term { fiber(r=1; u): u * u = ac(x) } }
    exp chi { term { f: 1; g: x; gshift: -1 } }
    exp chiq { term { f: qinv; g: x; gshift: -1 } }

    statement int_qinv : integrable qinv over x on O
    statement int_qpos : integrable qpos over x on O
    statement int_qinv2 : integrable qinv2 over x on O
    statement int_ordx : integrable ordx over x on O
    statement int_chiq : integrable chiq over x on O
    statement int_qinvz : integrable qinvz over z on {0 <= z}
    statement bdd_qinv : bounded qinv over x on O
    statement bdd_qpos : bounded qpos over x on {~(x = 0) /\ 0 <= ord(x)}
    statement bdd_chi : bounded chi over x on O
    statement bdd_sq : bounded sq over x on O
    statement bnd_pl : bound(0, 1) pl over L on {0 <= L}
    statement bnd_lq : bound(0, 0) lq over L on {0 <= L}
    statement bnd_pl0 : bound(0, 0) pl over L on {0 <= L}
    statement fml_sqrt2 : formula exists u:RF (u * u = 2)
    statement fml_ord1 : formula exists x:VF (ord(x) = 1 /\ ac(x) = 1)
    statement fml_even : formula forall z:ZZ (exists y:ZZ (y + y = z \/ y + y + 1 = z))
    twists 1, 2
)";

inline wb::TransferOptions options()
{
    wb::TransferOptions o;
    o.box.vmin = -4;
    o.box.vmax = 10;
    o.box.depth = 2;
    o.box.zmin = -10;
    o.box.zmax = 20;
    o.box.eval_box.vmin = -1;
    o.box.eval_box.vmax = 2;
    o.box.eval_box.depth = 1;
    return o;
}

} // namespace transfer_suite
