import logging
import os

import click

from entity.mlp_model import load_model, save_model
from entity.sim_config import SimConfig
from manager.oracle_manager import OracleManager
from manager.simulation_manager import SimulationManager, SweepError, emit_results
from manager.training_manager import TrainingManager
import utils.utils as utils
import utils.cli_utils as cli_utils


logging.basicConfig(filename=utils.get_config().log_file,
                    level=utils.get_config().log_level,
                    format='%(asctime)s %(levelname)s %(module)s: %(message)s',)
logger = logging.getLogger(__name__)

@click.group()
def cli():
    pass

def run_and_emit(sim_config: SimConfig, out: str, format: str, threads: int | None):
    manager = SimulationManager(sim_config, threads)
    utils.print(f"Simulating {sim_config.n_t}x{sim_config.n_r} {sim_config.constellation.name}, "
        f"{sim_config.channel.kind.value}, {len(sim_config.snr_db_list)} SNR points x {sim_config.n_trials} trials",
        "info")
    try:
        rows = manager.run_sweep()
    except SweepError as e:
        emit_results(e.rows, format, out)
        utils.print(f"Partial results written to {out}", "warning")
        raise
    emit_results(rows, format, out)
    cli_utils.print_rows(rows, sim_config.m_c)
    utils.print(f"Results written to {out}", "success")

@click.command(help="Runs an SNR sweep over the configured detectors and writes the result table")
@click.option('--config', '-c', 'config_path', required=True, help="Simulation config (flat JSON)")
@click.option('--out', '-o', required=True, help="Result file")
@click.option('--format', '-f', type=click.Choice(['csv', 'json']), default='csv', help="Result file format")
@click.option('--threads', '-t', type=int, default=None, help="Trial-level threads, config default if omitted")
@click.option('--snr', default=None, help="Comma-separated SNR points in dB, overrides the config")
def simulate(config_path, out, format, threads, snr):
    logger.info(f"Running 'simulate' command with config: {config_path}, out: {out}, threads: {threads}, snr: {snr}")
    try:
        sim_config = SimConfig.from_file(config_path)
        if snr:
            sim_config = sim_config.replace(snr_db_list=cli_utils.parse_float_list(snr))
        run_and_emit(sim_config, out, format, threads)
    except Exception as e:
        utils.print(f"Error: {str(e)}", "error")
        logging.exception(f"Exception for 'simulate' command")
        exit(1)

@click.command(help="Trains the LLR network on oracle-labelled samples and saves it")
@click.option('--config', '-c', 'config_path', required=True, help="Simulation config (flat JSON)")
@click.option('--out-model', '-m', required=True, help="Model file to write")
def train(config_path, out_model):
    logger.info(f"Running 'train' command with config: {config_path}, out model: {out_model}")
    try:
        sim_config = SimConfig.from_file(config_path)
        utils.print(f"Building {sim_config.train_samples} oracle-labelled channel uses", "info")
        model, trace = TrainingManager(sim_config).train()
        utils.print(f"Trained {len(trace)} epochs, loss {trace[0]:.4g} -> {trace[-1]:.4g}")
        directory = os.path.dirname(out_model)
        if directory:
            os.makedirs(directory, exist_ok=True)
        save_model(model, out_model)
        utils.print(f"Model saved to {out_model}", "success")
    except Exception as e:
        utils.print(f"Error: {str(e)}", "error")
        logging.exception(f"Exception for 'train' command")
        exit(1)

@click.command(help="Runs the sweep with the mpps detectors using the given model")
@click.option('--model', '-m', 'model_path', required=True, help="Trained model file")
@click.option('--config', '-c', 'config_path', required=True, help="Simulation config (flat JSON)")
@click.option('--out', '-o', required=True, help="Result file")
@click.option('--format', '-f', type=click.Choice(['csv', 'json']), default='csv', help="Result file format")
@click.option('--threads', '-t', type=int, default=None, help="Trial-level threads, config default if omitted")
def evaluate(model_path, config_path, out, format, threads):
    logger.info(f"Running 'evaluate' command with model: {model_path}, config: {config_path}, out: {out}")
    try:
        load_model(model_path)
        sim_config = SimConfig.from_file(config_path).replace(model_path=model_path)
        run_and_emit(sim_config, out, format, threads)
    except Exception as e:
        utils.print(f"Error: {str(e)}", "error")
        logging.exception(f"Exception for 'evaluate' command")
        exit(1)

@click.command(help="Runs the invariant and oracle suites")
@click.option('--config', '-c', 'config_path', required=True, help="Simulation config (seed and lambda_max)")
def oracle(config_path):
    logger.info(f"Running 'oracle' command with config: {config_path}")
    try:
        reports = OracleManager(SimConfig.from_file(config_path)).run_all()
        for report in reports:
            status = "PASS" if report.passed else "FAIL"
            utils.print(f"{status} {report.name}: {report.detail} ({report.elapsed:.1f} s)",
                "success" if report.passed else "error")
        if not all(report.passed for report in reports):
            exit(1)
    except Exception as e:
        utils.print(f"Error: {str(e)}", "error")
        logging.exception(f"Exception for 'oracle' command")
        exit(1)

cli.add_command(simulate)
cli.add_command(train)
cli.add_command(evaluate)
cli.add_command(oracle)


if __name__ == '__main__':
    cli()
