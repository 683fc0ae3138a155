import pytest

from behavxva.tables import (
    CVA_CLIENTS, CVA_HEDGES, PUBLISHED_CVA_JUMP20, PUBLISHED_CVA_NOJUMP, PROFILES, TABLE_IDS,
    cell_tolerance, published_value, reproduce_table, sweep_keys,
)


def test_grid_sizes():
    assert len(sweep_keys("mva-ccp")) == 36
    assert len(sweep_keys("cva-nojump")) == 72
    assert sweep_keys("cva-jump20", clients=[], maturities=[5]) == []
    with pytest.raises(ValueError):
        sweep_keys("kva-table")


def test_golden_data_shape():
    for table in (PUBLISHED_CVA_NOJUMP, PUBLISHED_CVA_JUMP20):
        for by_client in table.values():
            assert set(by_client) == set(CVA_CLIENTS)
            for row in by_client.values():
                assert set(row) == set(PROFILES)
                assert all(len(v) == len(CVA_HEDGES) for v in row.values())
    for m in (5, 30):
        for c in CVA_CLIENTS:
            for p in PROFILES:
                for h in CVA_HEDGES:
                    if c == h:
                        assert published_value("cva-nojump", c, h, p, m) == 0


def test_tolerances():
    assert cell_tolerance("mva-ccp", 250, None, "flat", 30) == 1.0
    assert cell_tolerance("mva-ccp", 250, None, "flat", 10) == 2.0
    assert cell_tolerance("cva-nojump", 100, 100, "flat", 30) == 0.5
    assert cell_tolerance("cva-jump20", 50, 250, "increasing", 30) == 8.0


def test_sub_grid_and_off_grid_cells():
    r = reproduce_table("mva-ccp", clients=[250, 333], profiles=["flat"], maturities=[30])
    assert len(r) == 2
    assert r[(250, None, "flat", 30)].published_pct == -38
    off = r[(333, None, "flat", 30)]
    assert off.published_pct is None and off.within_tolerance is None and off.value_pct < 0
    with pytest.raises(KeyError):
        r[(1, None, "flat", 1)]


def test_threads_do_not_change_results():
    a = reproduce_table("cva-jump20", maturities=[5], workers=1)
    b = reproduce_table("cva-jump20", maturities=[5], workers=4)
    assert a == b


def test_fixed_truncation_changes_jump_cell():
    wide = reproduce_table("cva-jump20", clients=[50], hedges=[250], profiles=["increasing"], maturities=[30])
    three = reproduce_table("cva-jump20", clients=[50], hedges=[250], profiles=["increasing"], maturities=[30], n=3)
    assert three.cells[0].value_pct < wide.cells[0].value_pct - 10


@pytest.mark.parametrize("table_id", TABLE_IDS)
def test_full_tables_within_golden_tolerance(table_id):
    r = reproduce_table(table_id)
    assert r.breaches() == []
    assert r.max_abs_deviation() <= 1.0
