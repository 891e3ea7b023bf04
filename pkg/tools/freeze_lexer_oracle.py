"""Freeze the lexer oracle fixture.

Runs the runtime's own tokenizer over every file in
tests/fixtures/lexer_cases/ and records the expected token stream in
tests/fixtures/lexer_oracle.json. The mapping to the toolkit's token
model:

  NAME/NUMBER/STRING/OP/COMMENT/NEWLINE -> same kind, same text
  NL, ENCODING                          -> dropped (whitespace gap)
  INDENT                                -> Indent with text ""
  DEDENT                                -> Dedent, col = indentation width
  ENDMARKER                             -> EndMarker with text ""

Run once and commit the JSON; tests compare against the frozen file, not
against a live tokenize call.
"""

import io
import json
import pathlib
import tokenize

KIND_MAP = {
    tokenize.NAME: "Name",
    tokenize.NUMBER: "Number",
    tokenize.STRING: "String",
    tokenize.OP: "Operator",
    tokenize.COMMENT: "Comment",
    tokenize.NEWLINE: "Newline",
    tokenize.INDENT: "Indent",
    tokenize.DEDENT: "Dedent",
    tokenize.ENDMARKER: "EndMarker",
}


def expected_stream(source: str):
    out = []
    for tok in tokenize.generate_tokens(io.StringIO(source).readline):
        if tok.type in (tokenize.NL, tokenize.ENCODING):
            continue
        kind = KIND_MAP[tok.type]
        text = tok.string
        if kind in ("Indent", "Dedent", "EndMarker"):
            text = ""
        out.append(
            {"kind": kind, "text": text, "line": tok.start[0], "col": tok.start[1]}
        )
    return out


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    cases_dir = root / "tests" / "fixtures" / "lexer_cases"
    oracle = {}
    for path in sorted(cases_dir.glob("*.py")):
        source = path.read_text(encoding="utf-8")
        oracle[path.name] = expected_stream(source)
    out_path = root / "tests" / "fixtures" / "lexer_oracle.json"
    out_path.write_text(json.dumps(oracle, indent=1) + "\n", encoding="utf-8")
    total = sum(len(v) for v in oracle.values())
    print(f"froze {len(oracle)} files, {total} tokens -> {out_path}")


if __name__ == "__main__":
    main()
