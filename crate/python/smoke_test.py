"""Smoke test for the domforge Python module.

Build and install the extension first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/domforge-*.whl

then run `python python/smoke_test.py` from the repository root.
"""

import pathlib
import tempfile

import domforge

ROOT = pathlib.Path(__file__).resolve().parent.parent
MINI = ROOT / "crates/core/tests/fixtures/minicorpus"

GO_SOURCE = """package api

import "github.com/gin-gonic/gin"

func Routes(r *gin.Engine) {
\tr.Use(gin.Logger())
\tr.GET("/ping", func(c *gin.Context) {
\t\tc.String(200, "pong")
\t})
}
"""


def check_extraction():
    records = domforge.extract_functions(GO_SOURCE, "gin")
    assert len(records) == 1, records
    rec = records[0]
    assert rec.signature == "func Routes(r *gin.Engine)"
    # calls are qualified by the receiver's static type
    assert rec.apis == ["gin.Engine.Use", "gin.Logger", "gin.Engine.GET", "gin.Context.String"], rec.apis
    assert domforge.FunctionRecord.from_json(rec.to_json()).id == rec.id
    return rec


def check_knowledge_and_prompts(rec):
    kb = domforge.KnowledgeBase.build([str(MINI / "libsrc/gin")], "gin")
    assert "gin.RouterGroup.Use" in kb and len(kb) > 10
    assert kb.summary("gin.RouterGroup.Use") == "Adds middleware to the group"
    assert kb.lookup("gin.Nope") is None

    sig = rec.signature
    assert domforge.render_prompt("signature", sig) == "Complete this function: " + sig
    assert (
        domforge.render_prompt("api", sig, ["gin.RouterGroup.Use"])
        == "Complete this function using gin.RouterGroup.Use: " + sig
    )
    try:
        domforge.render_prompt("docstring", sig, ["gin.Nope"], kb=kb)
    except domforge.DomforgeError as e:
        assert "gin.Nope" in str(e)
    else:
        raise AssertionError("missing docstring not reported")

    annotated = domforge.annotate_function(rec, kb)
    assert "// [API] gin.Engine.Use" in annotated
    assert domforge.strip_states(annotated) == rec.body


def check_metrics():
    code = 'func f() {\n\tx := 1\n\treturn x\n}'
    toks = domforge.tokenize_code(code)
    assert domforge.bleu(toks, toks) == 1.0
    cb = domforge.codebleu(code, code, "go")
    assert cb["score"] == 1.0 and set(cb["components"]) >= {"ngram", "syntax"}
    assert domforge.hit_ratio(["A", "B"], ["A", "C"]) == 0.5


def check_pipeline():
    with tempfile.TemporaryDirectory() as out:
        report = domforge.run_pipeline(str(MINI / "pipeline_gin_kg.json"), out_dir=out)
        assert report["aggregate"]["samples"] == 25
        golden = (MINI / "golden/pipeline_gin_kg/gen.jsonl").read_text()
        assert (pathlib.Path(out) / "gen.jsonl").read_text() == golden

        records = domforge.load_dataset(str(pathlib.Path(out) / "dataset.jsonl"))
        index = domforge.RetrievalInquirer(records)
        first = records[0]
        assert index.recommend(first.signature) == first.apis
        other, score = index.nearest(first.signature, exclude=first.id)
        assert other != first.id and 0.0 <= score <= 1.0


if __name__ == "__main__":
    rec = check_extraction()
    check_knowledge_and_prompts(rec)
    check_metrics()
    check_pipeline()
    print("python smoke test passed")
