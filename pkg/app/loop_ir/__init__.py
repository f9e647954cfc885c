# Loop IR package: parsing C loops and locating loop nests
