import argparse
import logging
import os
import shutil

from dotenv import load_dotenv

from config import LOG_CONFIG

logger = logging.getLogger(__name__)


def setup_environment(output_dir=None):
    """
    Sets up the working environment

    Creates .env from .env.template when missing, loads it and creates the
    output directory.

    Args:
        output_dir (str): Directory for tables and meshes; defaults to
            DEEXT_OUTPUT_DIR or "output"

    Returns:
        str: The output directory
    """
    if not os.path.exists(".env"):
        if os.path.exists(".env.template"):
            shutil.copyfile(".env.template", ".env")
            logger.info("created .env from .env.template; edit it to change solver and rule defaults")
        else:
            logger.warning(".env.template not found, using built-in defaults")

    load_dotenv()

    output_dir = output_dir or os.getenv("DEEXT_OUTPUT_DIR") or "output"
    if not os.path.exists(output_dir):
        os.makedirs(output_dir)
        logger.info("created output directory %s", output_dir)

    logger.info("setup complete")
    return output_dir


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Set up the Douady-Earle extension toolkit.")
    parser.add_argument("--output-dir", default=None, help="Output directory to create")

    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format=LOG_CONFIG["format"])
    setup_environment(args.output_dir)
