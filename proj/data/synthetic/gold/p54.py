def print_grid(size):
    for row in range(size):
        line = ""
        for col in range(size):
            line = line + "#"
            print(line)

print_grid(3)
