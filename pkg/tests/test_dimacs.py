import stat
import sys
import textwrap

import pytest

from rfreasons.dimacs import (
    DimacsError,
    read_dimacs,
    read_wcnf,
    solve_with_external,
    write_dimacs,
    write_wcnf,
)
from rfreasons.encodings import WeightedCnf, implicant_test_cnf
from rfreasons.solver import CnfInstance, SolveStatus


class TestCnfRoundTrip:
    def test_parse_simple(self):
        cnf = read_dimacs("p cnf 2 1\n1 2 0\n")
        assert cnf.var_count == 2
        assert cnf.clauses == ((1, 2),)

    def test_comments_and_blank_lines(self):
        text = "c a comment\n\np cnf 3 2\nc inner\n1 -2 0\n-3 0\n"
        cnf = read_dimacs(text)
        assert cnf.clauses == ((1, -2), (-3,))

    def test_clause_spanning_lines(self):
        cnf = read_dimacs("p cnf 3 1\n1 2\n3 0\n")
        assert cnf.clauses == ((1, 2, 3),)

    def test_round_trip_of_implicant_encoding(self, orchid):
        cnf = implicant_test_cnf(orchid).cnf
        again = read_dimacs(write_dimacs(cnf))
        assert again == cnf

    def test_error_carries_line_number(self):
        with pytest.raises(DimacsError) as e:
            read_dimacs("p cnf 2 1\n1 x 0\n")
        assert "line 2" in str(e.value)

    def test_missing_header(self):
        with pytest.raises(DimacsError):
            read_dimacs("1 2 0\n")

    def test_literal_out_of_range(self):
        with pytest.raises(DimacsError) as e:
            read_dimacs("p cnf 2 1\n5 0\n")
        assert "exceeds" in str(e.value)

    def test_unterminated_clause(self):
        with pytest.raises(DimacsError):
            read_dimacs("p cnf 2 1\n1 2\n")

    def test_clause_count_mismatch(self):
        with pytest.raises(DimacsError):
            read_dimacs("p cnf 2 2\n1 0\n")


class TestWcnf:
    def test_top_weight_convention(self):
        problem = WeightedCnf(CnfInstance(2, [(1, 2)]), (((-1,), 1), ((-2,), 5)))
        text = write_wcnf(problem)
        header = text.splitlines()[0].split()
        top = int(header[4])
        assert top == 7  # soft total + 1
        assert text.splitlines()[1].startswith(f"{top} ")
        again = read_wcnf(text)
        assert again.hard == problem.hard
        assert again.soft == problem.soft

    def test_weights_above_top_are_hard(self):
        got = read_wcnf("p wcnf 1 2 10\n10 1 0\n3 -1 0\n")
        assert got.hard.clauses == ((1,),)
        assert got.soft == (((-1,), 3),)

    def test_rejects_non_positive_weight(self):
        with pytest.raises(DimacsError):
            read_wcnf("p wcnf 1 1 10\n0 1 0\n")

    def test_header_errors(self):
        with pytest.raises(DimacsError):
            read_wcnf("p wcnf 1 1\n1 1 0\n")


FAKE_SOLVER = textwrap.dedent(
    """\
    #!{python}
    import sys
    sys.path[:0] = {path!r}
    from rfreasons.dimacs import read_dimacs
    from rfreasons.solver import SatSolver, SolveStatus
    cnf = read_dimacs(sys.stdin.read())
    out = SatSolver(cnf).solve()
    if out.status is SolveStatus.SAT:
        print("s SATISFIABLE")
        lits = [v if out.model[v - 1] else -v for v in range(1, cnf.var_count + 1)]
        print("v " + " ".join(map(str, lits)) + " 0")
    else:
        print("s UNSATISFIABLE")
    """
)


class TestExternalAdapter:
    @pytest.fixture
    def fake_solver(self, tmp_path):
        script = tmp_path / "fake_solver.py"
        script.write_text(FAKE_SOLVER.format(python=sys.executable, path=list(sys.path)))
        script.chmod(script.stat().st_mode | stat.S_IEXEC)
        return [sys.executable, str(script)]

    def test_sat_with_model(self, fake_solver):
        out = solve_with_external(CnfInstance(2, [(1,), (-2,)]), fake_solver)
        assert out.status is SolveStatus.SAT
        assert out.model == (True, False)

    def test_unsat(self, fake_solver):
        out = solve_with_external(CnfInstance(1, [(1,), (-1,)]), fake_solver)
        assert out.status is SolveStatus.UNSAT

    def test_assumptions_passed_as_units(self, fake_solver):
        out = solve_with_external(CnfInstance(2, [(1, 2)]), fake_solver, assumptions=(-1, -2))
        assert out.status is SolveStatus.UNSAT

    def test_garbage_output_raises(self, tmp_path):
        script = tmp_path / "noise.py"
        script.write_text("print('hello')\n")
        with pytest.raises(RuntimeError):
            solve_with_external(CnfInstance(1, []), [sys.executable, str(script)])

    def test_disabled_unless_configured(self, monkeypatch):
        from rfreasons.dimacs import EXTERNAL_SOLVER_ENV, external_solver_command

        monkeypatch.delenv(EXTERNAL_SOLVER_ENV, raising=False)
        assert external_solver_command() is None
        monkeypatch.setenv(EXTERNAL_SOLVER_ENV, "minisat -verb=0")
        assert external_solver_command() == ["minisat", "-verb=0"]
