def main():
    x = 8
    while x > 0:
        if x % 2 == 0:
            print("even", x)
        else:
            print("odd", x)
        x = x - 1
    print("done")

main()
