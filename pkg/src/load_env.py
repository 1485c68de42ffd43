import os

from dotenv import load_dotenv

load_dotenv()

thread_num = int(os.getenv("FUCIK_THREAD_NUM", "1"))
log_level = os.getenv("FUCIK_LOG_LEVEL", "INFO").upper()
output_dir = os.getenv("FUCIK_OUTPUT_DIR", "out")

if __name__ == "__main__":
    print(thread_num, log_level, output_dir)
