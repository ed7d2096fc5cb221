"""Refit the lab-to-game label mapping and rewrite data/mapping.json.

Provenance tool for the pinned config: the shipped file must equal the fit
on the bundled tables (a test enforces this).
"""

from pathlib import Path

from oblivious_games import expdata

DATA = Path(__file__).resolve().parents[1] / "data"


def main() -> None:
    data = expdata.load_primary(DATA / "table2.csv")
    mapping, residual = expdata.fit_label_mapping(data)
    expdata.save_mapping(mapping, DATA / "mapping.json")
    print(f"wrote {DATA / 'mapping.json'} (fit residual {residual:.4f})")
    if mapping.to_dict() != expdata.pinned_mapping().to_dict():
        print("WARNING: fit disagrees with expdata.pinned_mapping(); update the code constant")


if __name__ == "__main__":
    main()
