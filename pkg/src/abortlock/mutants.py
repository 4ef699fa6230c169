"""Single-line semantic mutants, used to show the checkers are not vacuous."""

from __future__ import annotations

from .model import NIL, TOKEN, GoRef
from .semantics import BUSY_WAIT, END_ABORT, EXEC, Interpreter


class Line10WritesNil(Interpreter):
    """Abort leaves Nil in its node instead of the predecessor link."""

    def line_10(self, tx, p, ps):
        temp = tx.swap(ps.mynode.loc, NIL)
        ps = ps._replace(temp=temp)
        if temp is not NIL:
            return ps._replace(pc=11), EXEC
        tx.events.append(END_ABORT)
        return ps._replace(pc=1), EXEC


class Line5Omitted(Interpreter):
    """A woken waiter never resets its go flag."""

    def line_4(self, tx, p, ps):
        if tx.read(tx.cfg.go_loc(p)) is True:
            return ps._replace(pc=6), EXEC
        return ps, BUSY_WAIT


class Line9WritesToken(Interpreter):
    """Aborting waiter stamps the token into its predecessor's node."""

    def line_9(self, tx, p, ps):
        temp = tx.swap(tx.loc(ps.pred), TOKEN)
        ps = ps._replace(temp=temp)
        if temp is TOKEN:
            return ps._replace(pc=7), EXEC
        if temp is not NIL and temp != GoRef(p):
            ps = ps._replace(pred=temp)
        return ps._replace(pc=10), EXEC


class Line7KeepsNode(Interpreter):
    """Exit forgets to take over the predecessor node."""

    def line_7(self, tx, p, ps):
        new_ps, kind = super().line_7(tx, p, ps)
        return new_ps._replace(mynode=ps.mynode), kind


class Line3NoSplice(Interpreter):
    """Waiters never adopt an aborted predecessor's link."""

    def _inspect_pred(self, tx, p, ps):
        new_ps, kind = super()._inspect_pred(tx, p, ps)
        if new_ps.pc == 6 and new_ps.pred != ps.pred:
            return new_ps._replace(pred=ps.pred, pc=4), kind
        return new_ps, kind


MUTANTS = {
    "line10-writes-nil": Line10WritesNil,
    "line5-omitted": Line5Omitted,
    "line9-writes-token": Line9WritesToken,
    "line7-keeps-node": Line7KeepsNode,
    "line3-no-splice": Line3NoSplice,
}
