"""
sketchlab - aproksymacja niskiego rzędu przez uczone rzadkie szkice.

Uruchomienie z katalogu projektu:
    poetry run sketchlab --help

Albo bezpośrednio:
    poetry run python -m sketchlab.main gen-data --config run.json
"""

import typer

from sketchlab.core.log import configure_logging
from sketchlab.tools.audit_tool import AuditTool
from sketchlab.tools.eval_tool import EvalTool
from sketchlab.tools.gen_data_tool import GenDataTool
from sketchlab.tools.plot_tool import PlotTool
from sketchlab.tools.train_tool import TrainTool

app = typer.Typer(name="sketchlab", no_args_is_help=True, add_completion=False)


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Logi na poziomie DEBUG.")) -> None:
    """Eksperymenty ze szkicami: dane, trening, ewaluacja, audyt GJ, wykresy."""
    configure_logging(verbose)


# Rejestracja komend z modułów
GenDataTool().register(app)
TrainTool().register(app)
EvalTool().register(app)
AuditTool().register(app)
PlotTool().register(app)

if __name__ == "__main__":
    app()
