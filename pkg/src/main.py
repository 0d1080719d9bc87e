import typer
from dotenv import load_dotenv

from .commands import (
    ask,
    compare,
    crossval,
    evaluate,
    generate,
    report,
    train,
)

load_dotenv()

app = typer.Typer(
    name="medqa",
    help="Two-stage medical question answering: classify a question into a label, answer from a bank.",
    add_completion=False,
    no_args_is_help=True,
)

app.command(name="generate")(generate.generate)
app.command(name="train")(train.train)
app.command(name="crossval")(crossval.crossval)
app.command(name="compare")(compare.compare)
app.command(name="evaluate")(evaluate.evaluate)
app.command(name="ask")(ask.ask)
app.command(name="report")(report.report)


if __name__ == "__main__":
    app()
