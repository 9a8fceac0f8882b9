def grid(size):
    for row in range(size):
        line = ""
        for col in range(size):
            if row == col:
                line = line + "x"
            else:
                line = line + "."
        print(line)

grid(2)
