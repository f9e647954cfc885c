#!/usr/bin/env python
import requests
import time
import sys

# API endpoint
API_URL = "http://localhost:9000/predict"

DOT_PRODUCT = """\
int dot(int *a, int *b, int n) {
  int s = 0;
  for (int i = 0; i < n; i++)
    s += a[i] * b[i];
  return s;
}
"""


def run_query(source, file="<input>", rewrite=True):
    payload = {"source": source, "file": file, "rewrite": rewrite}

    print(f"Sending {file} ({len(source)} characters) for prediction")
    try:
        response = requests.post(API_URL, json=payload)
        if response.status_code == 200:
            data = response.json()
            print(
                f"\nPredictions ({len(data['predictions'])} nests, took {data['execution_time_ms']:.2f}ms):"
            )
            print("-" * 80)

            for prediction in data["predictions"]:
                print(
                    f"{prediction['nest_id']} (line {prediction['line']}): VF={prediction['vf']} IF={prediction['if']}"
                )

            if data.get("source"):
                print("\nRewritten source:")
                print(data["source"])

            return data
        else:
            print(f"Error: {response.status_code} - {response.text}")
            return None
    except Exception as e:
        print(f"Error connecting to API: {e}")
        return None


# Wait for the API to be ready
def wait_for_api(max_retries=30, retry_delay=2):
    print("Waiting for API to be ready...")

    for i in range(max_retries):
        try:
            response = requests.get("http://localhost:9000/ready")
            if response.status_code == 200:
                print("API is ready!")
                return True
            else:
                print(
                    f"API not ready yet (status: {response.status_code}), retrying..."
                )
                time.sleep(retry_delay)
        except Exception as e:
            print(f"Error connecting to API: {e}")
            time.sleep(retry_delay)

    print(f"API not ready after {max_retries} retries")
    return False


if __name__ == "__main__":
    if len(sys.argv) > 1:
        path = sys.argv[1]
        with open(path, encoding="utf-8") as handle:
            run_query(handle.read(), file=path)
        sys.exit(0)

    if wait_for_api():
        run_query(DOT_PRODUCT, file="dot.c")
